"""Application entry point when executed as a module, e.g.

.. code:: console

    python -m composite_entropy.core
"""

from .cli import run

if __name__ == "__main__":
    raise SystemExit(run())
