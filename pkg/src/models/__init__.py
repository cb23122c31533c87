from src.models.paths import HurstParam, SamplingMethod, PathKind, FbmPath, SampledFunction
from src.models.integrands import Hypothesis, ConvexSpec, LipschitzSpec, Integrand
from src.models.crossing import CrossingQuery, CrossingResult
from src.models.besov import BesovReport
