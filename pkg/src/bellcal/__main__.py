"""Entry point for ``python -m bellcal``."""

from .cli import main

if __name__ == "__main__":
    raise SystemExit(main())
