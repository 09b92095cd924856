"""Module entry point: python3 -m lowlying <command> ..."""

from .cli import main

if __name__ == "__main__":
    raise SystemExit(main())
