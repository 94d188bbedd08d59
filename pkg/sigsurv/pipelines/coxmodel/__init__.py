from sigsurv.pipelines.coxmodel.extract import read_cox_model
from sigsurv.pipelines.coxmodel.lasso import (
    CoxFitConfig,
    CoxSolverConfig,
    lambda_max,
    neg_log_partial_likelihood,
    neg_log_partial_likelihood_grad,
    neg_penalized_loglik,
)
from sigsurv.pipelines.coxmodel.load import write_cox_model
from sigsurv.pipelines.coxmodel.model import (
    CoxModel,
    breslow_baseline,
    fit_cox_lasso,
    predict_survival,
    predict_survival_curve,
    risk_score,
)

__all__ = [
    "CoxFitConfig",
    "CoxModel",
    "CoxSolverConfig",
    "breslow_baseline",
    "fit_cox_lasso",
    "lambda_max",
    "neg_log_partial_likelihood",
    "neg_log_partial_likelihood_grad",
    "neg_penalized_loglik",
    "predict_survival",
    "predict_survival_curve",
    "read_cox_model",
    "risk_score",
    "write_cox_model",
]
