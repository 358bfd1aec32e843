"""Real semisimple Lie algebras: structure constants, Cartan and Vogan data, generation experiments."""

__version__ = "0.1.0"

from .errors import InputError, LiegenError, NumericalDegeneracyError, PreconditionError  # noqa: E402,F401

__all__ = ["InputError", "LiegenError", "NumericalDegeneracyError", "PreconditionError", "__version__"]
