"""Tests for the package identity and the CSV provenance header (core.about)."""

import importlib.metadata
from unittest.mock import patch

from composite_entropy.core import about


class TestAppVersion:
    """Tests for resolving the installed package version."""

    @patch(
        "composite_entropy.core.about.importlib.metadata.version",
        return_value="1.2.3",
    )
    def test_returns_installed_version(self, mock_version):
        assert about.app_version() == "1.2.3"
        assert mock_version.call_args.args[0] == "composite-entropy"

    @patch(
        "composite_entropy.core.about.importlib.metadata.version",
        side_effect=importlib.metadata.PackageNotFoundError,
    )
    def test_returns_empty_without_dist_metadata(self, mock_version):
        """A source checkout with no dist metadata reports no version, not an error."""
        assert about.app_version() == ""


class TestProvenance:
    """The `#` header lines every CSV file starts with."""

    @patch("composite_entropy.core.about.app_version", return_value="0.3.0")
    def test_names_tool_units_and_settings(self, _version):
        lines = about.provenance({"weight": "gaussian", "grid_n": 1024})

        assert lines == [
            "# composite-entropy 0.3.0",
            "# entropies in nats; lengths in units of b; hbar = m = b = 1",
            "# weight=gaussian grid_n=1024",
        ]

    @patch("composite_entropy.core.about.app_version", return_value="")
    def test_unknown_version(self, _version):
        assert about.provenance({})[0] == "# composite-entropy unknown"

    def test_is_deterministic(self):
        """No timestamp: the same settings give the same header."""
        settings = {"weight": "constant", "phase_n": 256}

        assert about.provenance(settings) == about.provenance(dict(settings))
        assert all(line.startswith("#") for line in about.provenance(settings))
