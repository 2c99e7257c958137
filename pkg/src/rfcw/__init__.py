"""Large deviations and phase diagrams of Curie-Weiss models with random external fields."""
from .field_models import (Constant, Dichotomous, FieldModel, FieldRealization, FiniteTable,
                           FreeEnergy, MarkovChain, Rotation, Uniform, f_n, limit_f,
                           limit_f_prime, limit_f_second, model_from_dict, model_from_json,
                           sample_fields)
from .gibbs_exact import (MagnetizationPMF, empirical_rate, gibbs_pmf, glauber_sample,
                          ldp_convergence_report, product_pmf)
from .legendre import INF, Conjugate, biconjugate_check, conjugate, log_mgf
from .phase_diagram import (MinimumReport, PhaseLabel, classify_minimum, classify_phase,
                            critical_beta, find_global_minima, phase_scan, tricritical_point)
from .rate_function import G_of, RateFunction, TiltFunction, rate_I, tilt_F

__version__ = "0.1.0"
