from datetime import datetime

from sqlalchemy import Boolean, Float, Integer, String, Text, TIMESTAMP, func
from sqlalchemy.orm import Mapped, mapped_column

from src.database.database import Base


class RunsOrm(Base):
    __tablename__ = "runs"

    scenario: Mapped[str] = mapped_column(String, nullable=False)
    hurst: Mapped[float] = mapped_column(Float, nullable=False)
    r_norm: Mapped[float] = mapped_column(Float, nullable=False)
    replicates: Mapped[int] = mapped_column(Integer, nullable=False)
    seed: Mapped[int] = mapped_column(Integer, nullable=False)
    slope: Mapped[float] = mapped_column(Float, nullable=False)
    slope_stderr: Mapped[float] = mapped_column(Float, nullable=False)
    theoretical_exponent: Mapped[float] = mapped_column(Float, nullable=False)
    passed: Mapped[bool] = mapped_column(Boolean, nullable=False)
    config_hash: Mapped[str] = mapped_column(String(64), nullable=False)
    result_path: Mapped[str | None] = mapped_column(Text, nullable=True)
    created_at: Mapped[datetime] = mapped_column(TIMESTAMP(timezone=True), server_default=func.now())
