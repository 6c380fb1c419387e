"""
Main entry point for the robust-linkage command line.
"""

import sys

from robust_linkage.cli import dispatch


def main() -> None:
    """Main entry point for the robust-linkage application."""
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
