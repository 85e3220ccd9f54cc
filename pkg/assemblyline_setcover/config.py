import logging
import multiprocessing
import os

from assemblyline.common import forge
from assemblyline.common import log as al_log


config = forge.get_config()

#################################################################
# Configuration


def _env_int(name, default):
    return int(os.environ.get(name, default))


DEBUG = config.ui.debug
VERSION = os.environ.get('ASSEMBLYLINE_VERSION', "4.0.0.dev0")

# Brute-force oracle guards
BRUTE_FORCE_MAX_N = _env_int('SETCOVER_BRUTE_FORCE_MAX_N', 30)
BRUTE_FORCE_MAX_M = _env_int('SETCOVER_BRUTE_FORCE_MAX_M', 24)
CHROMATIC_MAX_N = _env_int('SETCOVER_CHROMATIC_MAX_N', 10)
CHROMATIC_FALLBACK_MAX_N = _env_int('SETCOVER_CHROMATIC_FALLBACK_MAX_N', 20)
LINSAT_BRUTE_MAX_M = _env_int('SETCOVER_LINSAT_BRUTE_MAX_M', 20)

# Solver guards
MAX_UNIVERSE = _env_int('SETCOVER_MAX_UNIVERSE', 63)
LATTICE_MAX_MEMBERS = _env_int('SETCOVER_LATTICE_MAX_MEMBERS', 2 ** 22)
FOLKLORE_MAX_N = _env_int('SETCOVER_FOLKLORE_MAX_N', 26)
WITNESS_MAX_N = _env_int('SETCOVER_WITNESS_MAX_N', 16)
WITNESS_MAX_M = _env_int('SETCOVER_WITNESS_MAX_M', 16)
REDUCTION_MAX_SETS = _env_int('SETCOVER_REDUCTION_MAX_SETS', 200000)
MAX_INTEGER_PARTITIONS = _env_int('SETCOVER_MAX_INTEGER_PARTITIONS', 100000)
LIST2_MAX_STATES = _env_int('SETCOVER_LIST2_MAX_STATES', 2 ** 22)
ISD_MAX_ENUM = _env_int('SETCOVER_ISD_MAX_ENUM', 2 ** 20)

# Randomness and repetition
DEFAULT_SEED = _env_int('SETCOVER_DEFAULT_SEED', 0)
LINSAT_TRIAL_FACTOR = float(os.environ.get('SETCOVER_LINSAT_TRIAL_FACTOR', 1.0))
ZETA_CAP = 0.2499
WORKERS = _env_int('SETCOVER_WORKERS', multiprocessing.cpu_count())

# End of Configuration
#################################################################

#################################################################
# Prepare loggers
config.logging.log_to_console = config.logging.log_to_console or DEBUG
al_log.init_logging('setcover', config=config)

LOGGER = logging.getLogger('assemblyline.setcover')

LOGGER.debug('Logger ready!')

# End of prepare logger
#################################################################
