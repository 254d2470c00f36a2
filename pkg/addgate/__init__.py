"""Addition-based gated recurrent networks."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("addgate")
except PackageNotFoundError:
    __version__ = "0.0.0-dev"
