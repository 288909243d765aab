"""Exception hierarchy shared by the package."""


class RellichError(Exception):
    """Base class for all errors raised by rellichpoly."""


class GeometryError(RellichError):
    pass


class SelfIntersecting(GeometryError):
    pass


class DegenerateFace(GeometryError):
    pass


class NonPlanarFace(GeometryError):
    pass


class BadOrientation(GeometryError):
    pass


class SingularSystem(GeometryError):
    pass


class NotAQuadrilateral(GeometryError):
    pass


class NotASimplex(GeometryError):
    pass


class MeshError(RellichError):
    pass


class EarClippingFailed(MeshError):
    pass


class InconsistentMesh(MeshError):
    pass


class DegenerateTriangle(MeshError):
    pass


class SolverError(RellichError):
    pass


class MassNotSPD(SolverError):
    pass


class TooFewInteriorNodes(SolverError):
    pass


class TooManyInteriorNodes(SolverError):
    pass


class OutsideDomain(RellichError):
    pass


class MismatchedFaces(RellichError):
    pass
