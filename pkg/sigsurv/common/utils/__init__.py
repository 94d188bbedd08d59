from sigsurv.common.utils.load_yaml import load_yaml
from sigsurv.common.utils.step_function import StepFunction

__all__ = ["StepFunction", "load_yaml"]
