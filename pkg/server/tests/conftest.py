import sys
from pathlib import Path

SERVER_ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(SERVER_ROOT / "src"))

FIXTURES = Path(__file__).resolve().parent / "fixtures"
