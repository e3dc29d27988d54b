from .johansen import DEFAULT_DET_CASE, DET_CASES, JohansenReport, johansen_test
from .unitroot import UnitRootReport, adf_test, auto_bandwidth, engle_granger, pp_test

__all__ = [
    "DEFAULT_DET_CASE",
    "DET_CASES",
    "JohansenReport",
    "UnitRootReport",
    "adf_test",
    "auto_bandwidth",
    "engle_granger",
    "johansen_test",
    "pp_test",
]
