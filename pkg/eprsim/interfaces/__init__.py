from .oraclejoint import OracleJoint
from .povmpair import PovmPair
from .results import ResultsSorter
from .simulate import Simulate
from .verdict import Verdict
