class PDDLError(Exception):
    """Base class for everything the PDDL layer rejects."""


class PDDLSyntaxError(PDDLError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line else ""
        super().__init__(where + message)


class UnsupportedRequirement(PDDLError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unsupported requirement {name}")


class UndeclaredType(PDDLError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"undeclared type {name!r}")


class UnknownPredicate(PDDLError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown predicate {name!r}")


class ArityMismatch(PDDLError):
    def __init__(self, name: str, expected: int, got: int):
        self.name = name
        self.expected = expected
        self.got = got
        super().__init__(f"{name!r} expects {expected} argument(s), got {got}")


class UnknownObject(PDDLError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown object or variable {name!r}")


class TypeMismatch(PDDLError):
    pass


class UnknownAction(PDDLError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown action {name!r}")
