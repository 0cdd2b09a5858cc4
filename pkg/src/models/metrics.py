from pydantic import BaseModel


class ChannelMetrics(BaseModel):
    channel: str  # "C1" .. "C7"
    rmse: float  # N
    rms_pct: float  # RMSE / range(actual) * 100
    corr: float  # Pearson; NaN when either series is constant


class MetricsReport(BaseModel):
    """Per-C_i error metrics plus mean ± sd across channels"""

    channels: list[ChannelMetrics]
    rmse_mean: float
    rmse_sd: float
    rms_pct_mean: float
    rms_pct_sd: float
    corr_mean: float
    corr_sd: float
