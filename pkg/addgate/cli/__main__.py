"""Allow running via `python -m addgate.cli`."""

from addgate.cli import main

main()
