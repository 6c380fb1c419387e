"""
Main module for running robust-linkage as a package.
This allows running the toolkit with:
    python -m robust_linkage <command> [args]
"""

from .main import main

if __name__ == "__main__":
    main()
