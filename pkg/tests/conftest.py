import sys
from pathlib import Path

# Allow running the suite from a source checkout without installing.
_src = Path(__file__).resolve().parent.parent / "src"
if str(_src) not in sys.path:
    sys.path.insert(0, str(_src))
