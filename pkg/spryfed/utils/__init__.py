from .logger import get_logger
from .seeding import mix64, make_generator, derive_generator

__all__ = ['get_logger', 'mix64', 'make_generator', 'derive_generator']
