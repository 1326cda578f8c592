"""Simple script to run an experiment recipe without installing the package"""
import sys
from pathlib import Path

# Add package directory to path
sys.path.insert(0, str(Path(__file__).parent))

from illusion_lab.cli import main


if __name__ == "__main__":
    sys.exit(main())
