import os
from typing import Literal

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field


class Settings(BaseModel):
    model_config = ConfigDict(extra="ignore")

    # Logging
    LOG_LEVEL: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"
    LOG_FILE: str | None = None

    # Thread number for FFT workers and lambda sweeps
    SPOISON_THREADS: int = Field(default=1, ge=1)

    @staticmethod
    def from_env(dotenv_path: str = "setting.env") -> "Settings":
        load_dotenv(dotenv_path)
        return Settings.model_validate(os.environ)
