"""Exception hierarchy shared by all gridflow modules."""


class GridFlowError(Exception):
    """Base class for all errors raised by this package."""


class CaseError(GridFlowError):
    """A case file could not be parsed or describes an unsolvable network."""


class MissingSection(CaseError):
    def __init__(self, section: str):
        super().__init__(f"required section 'mpc.{section}' not found")
        self.section = section


class MalformedNumber(CaseError):
    def __init__(self, token: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: not a number: {token!r}")
        self.token = token
        self.line = line
        self.column = column


class RowTooShort(CaseError):
    def __init__(self, section: str, row: int, got: int, need: int, line: int):
        super().__init__(
            f"line {line}: {section} row {row} has {got} columns, needs {need}"
        )
        self.section = section
        self.row = row
        self.line = line


class NoSlack(CaseError):
    def __init__(self):
        super().__init__("no slack bus (type 3) in case")


class MultipleSlack(CaseError):
    def __init__(self, bus_ids):
        super().__init__(f"multiple slack buses: {sorted(bus_ids)}")
        self.bus_ids = list(bus_ids)


class DanglingReference(CaseError):
    def __init__(self, kind: str, bus_id: int):
        super().__init__(f"{kind} references unknown bus {bus_id}")
        self.kind = kind
        self.bus_id = bus_id


class IslandDetected(CaseError):
    def __init__(self, bus_ids):
        super().__init__(
            f"{len(bus_ids)} bus(es) unreachable from the slack: {sorted(bus_ids)}"
        )
        self.bus_ids = list(bus_ids)


class MissingGenerator(CaseError):
    def __init__(self, bus_id: int):
        super().__init__(f"PV/slack bus {bus_id} has no in-service generator")
        self.bus_id = bus_id


class ZeroImpedanceBranch(CaseError):
    def __init__(self, from_id: int, to_id: int):
        super().__init__(f"branch {from_id}-{to_id} has r = x = 0")
        self.from_id = from_id
        self.to_id = to_id


class NumericError(GridFlowError):
    """Failure inside the sparse factorization / solve layer."""


class SingularPivot(NumericError):
    def __init__(self, index: int):
        super().__init__(
            f"pivot at elimination index {index} is below tolerance; "
            "system is numerically singular"
        )
        self.index = index


class PatternMismatch(NumericError):
    def __init__(self):
        super().__init__("system pattern differs from the factor's pattern")


class DimensionMismatch(NumericError):
    def __init__(self, got: int, expected: int):
        super().__init__(f"vector has length {got}, system order is {expected}")
        self.got = got
        self.expected = expected
