"""Latin cubes of even order that avoid an (m,m,m,m)-cube of forbidden symbols."""

__version__ = "0.1.0"
