"""
Runtime configuration, read once from the environment.

Command-line flags override these values; library functions take them as
keyword defaults so callers can always pass explicit caps.
"""

import os

# Enumeration caps
ENUM_RANK_CAP = int(os.environ.get("HERMQ_ENUM_RANK_CAP", "6"))
ORBIT_RANK_CAP = int(os.environ.get("HERMQ_ORBIT_RANK_CAP", "4"))
ISOTROPIC_SEARCH_BOUND = int(os.environ.get("HERMQ_ISOTROPIC_SEARCH_BOUND", "3"))

# Surgery
NORMALIZE_STEP_CAP = int(os.environ.get("HERMQ_NORMALIZE_STEP_CAP", "64"))

# Hermitian Q-construction caps per field size
QCAT_CAP_F2 = int(os.environ.get("HERMQ_QCAT_CAP_F2", "4"))
QCAT_CAP_F3 = int(os.environ.get("HERMQ_QCAT_CAP_F3", "3"))
QCAT_CAP_DEFAULT = int(os.environ.get("HERMQ_QCAT_CAP_DEFAULT", "2"))
QCAT_LAW_TRIPLE_LIMIT = int(os.environ.get("HERMQ_QCAT_LAW_TRIPLE_LIMIT", "200000"))

# Runs
DEFAULT_SEED = int(os.environ.get("HERMQ_SEED", "20240611"))
DEFAULT_JOBS = int(os.environ.get("HERMQ_JOBS", "1"))
LOG_DIR = os.environ.get("HERMQ_LOG_DIR", "logs")


def qcat_cap_for(modulus):
    """Largest rank cap build_hermitian_Q accepts over Z/modulus"""
    if modulus == 2:
        return QCAT_CAP_F2
    if modulus == 3:
        return QCAT_CAP_F3
    return QCAT_CAP_DEFAULT
