import sys
from pathlib import Path

# Let test modules import the sibling oracle/helper modules by name.
sys.path.insert(0, str(Path(__file__).parent))
