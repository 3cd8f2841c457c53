"""Pricing, hedging and optimizing in markets with superlinear trading frictions."""

from ._core import (  # noqa: F401
    BranchingRule,
    build_binomial_tree,
    certificate_penalty,
    Claim,
    constant_cashflow_plan_paths,
    constant_cashflow_plan_tree,
    ConstraintClass,
    detect_na2,
    dual_bound_envelope,
    dual_value,
    DualEval,
    eval_g,
    eval_g_prime,
    eval_g_star,
    example1_dual_family,
    example1_moment_s0sq,
    example1_moment_zs,
    Example1Value,
    execution_price_series_tree,
    FbmMethod,
    FbmParams,
    filter_positive_execution_tree,
    FocReport,
    FrictionKind,
    FrictionlabError,
    FrictionSpec,
    GBMParams,
    KktResiduals,
    load_ensemble,
    load_plan_matrix,
    market_bound_paths,
    market_bound_tree,
    MartingaleCertificate,
    maximize_dual,
    maximize_utility,
    na2_certificate_search,
    Na2CertificateSearch,
    Na2Report,
    PathEnsemble,
    quantize_fbm_tree,
    roll_forward_paths,
    roll_forward_tree,
    save_ensemble,
    save_plan_matrix,
    ScenarioTree,
    simulate_fbm_price,
    simulate_gbm,
    SolverConfig,
    SolveReport,
    SolveStatus,
    superhedge_price,
    TimeGrid,
    TradingRatePlan,
    tree_from_json_str,
    TreeNode,
    utility_objective,
    UtilityKind,
    UtilitySpec,
    verify_foc,
    verify_weak_duality,
    volume_bound_check_paths,
    volume_bound_check_tree,
    VolumeBoundReport,
    WealthGrid,
)

__version__ = "0.1.0"
