"""Package identity: distribution name, version and the provenance header of CSV files.

The version is read from the installed distribution metadata, so a source checkout
without it reports an empty version rather than failing.
"""

import importlib.metadata

DISTRIBUTION = "composite-entropy"
PROG = "composite-entropy"
DESCRIPTION = (
    "Entanglement entropies and phase-space functions of a two-particle "
    "Gaussian composite."
)

UNITS = "entropies in nats; lengths in units of b; hbar = m = b = 1"


def app_version():
    """Return the installed package version, or "" if it can't be determined."""
    try:
        return importlib.metadata.version(DISTRIBUTION)
    except importlib.metadata.PackageNotFoundError:
        return ""


def provenance(settings):
    """`#`-prefixed header lines naming the tool, the units and the run settings.

    `settings` is an ordered mapping; no timestamp goes in, so identical settings give
    identical bytes.
    """
    version = app_version() or "unknown"
    pairs = " ".join(f"{key}={value}" for key, value in settings.items())
    return [f"# {PROG} {version}", f"# {UNITS}", f"# {pairs}"]
