"""Access to the coefficient files shipped with the package."""

from importlib import resources

from .methodfile import load_method, loads

__all__ = ["bundled_method_names", "load_bundled", "bundled_path"]


def _methods_dir():
    return resources.files("ssprk").joinpath("methods")


def bundled_method_names():
    """Sorted names of every shipped method file (without extension)."""
    return sorted(p.name[:-3] for p in _methods_dir().iterdir()
                  if p.name.endswith(".rk"))


def bundled_path(name):
    path = _methods_dir().joinpath(f"{name}.rk")
    if not path.is_file():
        known = ", ".join(bundled_method_names())
        raise KeyError(f"no bundled method {name!r}; available: {known}")
    return path


def load_bundled(name):
    """Load a shipped method by name (see `bundled_method_names`)."""
    return loads(bundled_path(name).read_text(encoding="utf-8"))
