"""Dynamic competition networks: CON scores, per-round centrality features,
tree-based node classification and rank correlation against ratings."""
__version__ = "0.1.0"

from .centrality import MEASURES, compute_measures, con_scores
from .graph import DynamicCompetitionNetwork, build_network, graph_stats
from .ingest import GroundTruthTable, MatchEvent, ParseError, parse_ground_truth, parse_match_log

__all__ = [
    "MEASURES", "DynamicCompetitionNetwork", "GroundTruthTable", "MatchEvent", "ParseError",
    "build_network", "compute_measures", "con_scores", "graph_stats", "parse_ground_truth",
    "parse_match_log", "__version__",
]
