"""Human verification: decision storage, agreement stats, web service."""

from .service import create_app
from .store import (
    REFERENCE_AGREEMENT,
    REFERENCE_FLEISS_KAPPA,
    AgreementStats,
    DecisionStore,
    VerificationRecord,
    agreement_stats,
    apply_verification,
    fleiss_kappa,
    majority_include,
)

__all__ = [
    "AgreementStats",
    "DecisionStore",
    "REFERENCE_AGREEMENT",
    "REFERENCE_FLEISS_KAPPA",
    "VerificationRecord",
    "agreement_stats",
    "apply_verification",
    "create_app",
    "fleiss_kappa",
    "majority_include",
]
