#!/usr/bin/env python3
"""
HPKernel - Hua-Pickrell kernels and samplers

Numerics for the pseudo-Jacobi ensemble, its N -> infinity correlation
kernel and the Hua-Pickrell random matrices behind both.

Usage:
    python main.py [global options] command [options]

Commands:
    eval-kernel    - Tabulate the limit kernel on a grid
    sample         - Sample matrices into a JSON Lines archive
    estimate-corr  - Monte Carlo correlation measures of boxes
    converge       - Finite-N kernel against the limit
    disjointness   - Kakutani products of Hellinger affinities
    gamma2         - Small-ball second moments of the spectrum
    painleve       - sigma-Painleve V residuals
    selftest       - Invariant suite with pass/fail per property

Examples:
    python main.py --s-re 0 eval-kernel --grid 0.1:2:50
    python main.py --s-re 0 --N 50 --seed 7 sample
    python main.py disjointness --s1 0 --s2 1
"""

import logging
import sys
from pathlib import Path

# Add src directory to path
src_path = Path(__file__).parent / "src"
sys.path.insert(0, str(src_path))

from rich.console import Console

# Import our modules
try:
    from src.cli import app as main_app
except ImportError as e:
    print(f"Import error: {e}")
    print("Please install dependencies: pip install -r requirements.txt")
    sys.exit(1)

console = Console()


@main_app.command()
def version():
    """Show version information."""
    from src import __version__, __description__

    console.print(f"""
HPKernel v{__version__}
{__description__}

Features:
• Pseudo-Jacobi polynomials, norms and Christoffel-Darboux kernels
• The N -> infinity kernel through 1F1, Bessel and Whittaker forms
• Fredholm determinants and sigma-Painleve V residuals
• Corner-by-corner sampling of Hua-Pickrell matrices
• Hellinger affinities and Kakutani products
• Spectral summaries, correlation estimates and the gamma2 diagnostic
    """)


@main_app.command()
def examples():
    """Show usage examples."""
    console.print("""
🧮 HPKernel Usage Examples:

📈 Kernels:
   python main.py --s-re 0 eval-kernel --grid 0.1:2:50
   python main.py --s-re 0.5 --N 100 eval-kernel --grid 0.1:2:20 --finite
   python main.py --s-re 1 --s-im 0.7 converge --points 0.1,0.5,1,2 --N-list 25,50,100,200

🎲 Sampling:
   python main.py --s-re 0 --N 50 --seed 7 sample
   python main.py --N 10 --samples 10000 sample --corners 2,5 --dump
   python main.py --N 10 --samples 10000 estimate-corr --boxes 0.1:0.2,0.2:0.5 --k 1
   python main.py --samples 10000 gamma2 --N-list 50,100 --eps-list 0.2,0.1,0.05

🔀 Disjointness:
   python main.py disjointness --s1 0 --s2 1 --N-max 10000

🌀 Painleve:
   python main.py --s-re 0.5 painleve --t-list 0.8,1,2 --order 60

✅ Checks:
   python main.py selftest

⚙️  Config files (key=value, flags win):
   python main.py --config run.env --N 20 sample
    """)


def main():
    """Main entry point."""
    try:
        # Check if we're being called with no arguments
        if len(sys.argv) == 1:
            console.print("""
🧮 HPKernel - Hua-Pickrell kernels and samplers

Run 'python main.py --help' for commands
Run 'python main.py examples' for usage examples
Run 'python main.py selftest' to check the installation
            """)
            return

        main_app()

    except KeyboardInterrupt:
        console.print("\n👋 Goodbye!")
    except Exception as e:
        console.print(f"❌ Error: {str(e)}")
        logging.exception("Unhandled exception in main")


if __name__ == "__main__":
    main()
