__version__ = "0.1.0"

from .api import run_example, ExampleRun  # noqa: F401
from .catalog import load_example, ExampleBundle  # noqa: F401
from .claims import verify_all, ClaimReport  # noqa: F401
from .consistency import enforce_23_consistency, ConsistencyState  # noqa: F401
from .errors import WnuError, InputError, ConstructionError  # noqa: F401
