"""Bibliometric indicators for conference evaluation."""

from .corpus import (
    Corpus,
    PaperRecord,
    VenueYearAggregate,
    citation_vector,
    validate_record,
    venue_year_aggregate,
)
from .elasticity import QqePoint, Regime, classify_regime, field_qqe, qqe_point, qqe_trajectory
from .indicators import (
    IndicatorReport,
    TopVenueRegistry,
    central_and_tail,
    gini,
    h_index,
    milestone_index,
    norm_h,
    prestige,
    scale_indicators,
    trajectory,
    venue_report,
)
from .stats import SpearmanResult, rank, spearman

__version__ = "0.1.0"
