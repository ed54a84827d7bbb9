import os

# Worker processes for the seed pool
DEFAULT_THREADS = int(os.getenv("BETHE_RC_THREADS", "1"))

# Arithmetic: "standard" (binary64) or "extended" (mpmath)
DEFAULT_PRECISION = os.getenv("BETHE_RC_PRECISION", "standard")

# Decimal digits of extended precision
DEFAULT_EXTENDED_DPS = int(os.getenv("BETHE_RC_EXTENDED_DPS", "60"))

# Logging level used by the CLI when no -v flag is given
LOG_LEVEL = os.getenv("BETHE_RC_LOG_LEVEL", "WARNING")

# Largest chain the exact-diagonalization oracle accepts
ORACLE_MAX_SITES = int(os.getenv("BETHE_RC_ORACLE_MAX_SITES", "14"))
