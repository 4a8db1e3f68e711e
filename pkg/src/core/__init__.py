"""Command line, configuration, logging, sweeps and the self-check."""
