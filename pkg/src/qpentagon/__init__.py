"""Numerical verification of a charged sum/integral q-hypergeometric identity,
its integral pentagon form and the associated Bailey lemma."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConstraintViolation,
    DecayViolation,
    ExhaustedResampling,
    InvalidNome,
    NonconvergentTail,
    PoleHit,
    QPentagonError,
)
from .qkernel import (  # noqa: E402
    ChargedFugacity,
    KernelValue,
    Nome,
    TruncationPolicy,
    abs_elimination_factor,
    b_kernel,
    charged_ratio,
    charged_ratio_signed,
    qpochhammer,
)
from .quadrature import (  # noqa: E402
    ChargeWindow,
    CircleGrid,
    SumIntegralResult,
    charge_sum_integral,
    circle_integral,
)
from .identities import (  # noqa: E402
    MainIdentityInstance,
    ResidualReport,
    Status,
    main_identity_check,
    main_identity_lhs,
    main_identity_rhs,
    no_abs_identity_check,
    pentagon_check,
)
from .bailey import (  # noqa: E402
    BaileyParams,
    BetaFunction,
    TestSequence,
    kernel_action,
    lemma_check,
    primed_alpha,
    primed_beta_direct,
    primed_beta_via_chain,
)
from .sampler import SamplerConfig, sample_bailey_params, sample_main_instance  # noqa: E402
