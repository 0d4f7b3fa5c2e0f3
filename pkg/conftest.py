import sys
from pathlib import Path

# Allow running the test suite from a clean checkout without installing.
SRC = Path(__file__).parent / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))
