#!/usr/bin/env python3
"""
Wrench grammar pipeline: force/torque signals → symbolic grammars → phase classifiers.

Entry point script. Validates dependencies, then hands over to the CLI.

Usage:
    python run.py synth gen --trials 38
    python run.py calibrate
    python run.py encode
    python run.py train --classifier mondrian
    python run.py eval
    python run.py --help
"""

import sys
from pathlib import Path

REQUIRED = ("rich", "numpy", "pandas", "scipy", "matplotlib")


def check_dependencies():
    """Ensure required packages are installed before importing anything else."""
    missing = []
    for name in REQUIRED:
        try:
            __import__(name)
        except ImportError:
            missing.append(name)
    if missing:
        print("╔═══════════════════════════════════════════════════════════╗")
        print("║  ❌ Missing dependencies:                                 ║")
        print(f"║    {', '.join(missing):<55}║")
        print("║                                                           ║")
        print("║  Quick fix:                                               ║")
        print("║    pip install -r requirements.txt                        ║")
        print("║                                                           ║")
        print("║  Or run the full setup:                                   ║")
        print("║    bash setup.sh                                          ║")
        print("╚═══════════════════════════════════════════════════════════╝")
        sys.exit(1)


def main():
    check_dependencies()

    # Ensure our package is importable
    pkg_dir = str(Path(__file__).resolve().parent)
    if pkg_dir not in sys.path:
        sys.path.insert(0, pkg_dir)

    from wrench_grammar.cli import main as cli_main

    sys.exit(cli_main())


if __name__ == "__main__":
    main()
