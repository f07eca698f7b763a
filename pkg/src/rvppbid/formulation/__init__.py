"""Per-session robust bidding models."""
from .bundle import (
    BASELINE23, DETERMINISTIC, MODES, PROPOSED, SessionModelBundle, StarredResults, UnitHandles,
)
from .price import PriceTerms, add_price_robust_terms
from .robust import add_robust_group, big_m_eps
from .session import build_baseline23_model, build_session_model, mean_price_band
from .system import STATES, build_balance, build_network_extension, build_trade_limits
from .units import build_demand_block, build_ndres_block, build_stu_block

__all__ = [
    "BASELINE23", "DETERMINISTIC", "MODES", "PROPOSED", "STATES", "PriceTerms", "SessionModelBundle",
    "StarredResults", "UnitHandles", "add_price_robust_terms", "add_robust_group", "big_m_eps",
    "build_balance", "build_baseline23_model", "build_demand_block", "build_ndres_block",
    "build_network_extension", "build_session_model", "build_stu_block", "build_trade_limits",
    "mean_price_band",
]
