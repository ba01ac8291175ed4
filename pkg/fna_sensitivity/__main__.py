"""Allow ``python -m fna_sensitivity`` invocation."""
import sys
from .cli import main

sys.exit(main())
