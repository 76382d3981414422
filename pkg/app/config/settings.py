import os
from pydantic_settings import BaseSettings
from dotenv import load_dotenv

# Cargar variables de entorno desde el archivo .env
load_dotenv(encoding="utf-8")

ARTIFACT_VERSION = "1.0.0"
REPORT_SCHEMA = "glasner-lab/report@1"


def _threads_default() -> int:
    try:
        return max(1, int(os.getenv("GLASNER_LAB_THREADS", "1")))
    except ValueError:
        return 1


class Settings(BaseSettings):
    # App
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")
    LOG_FILE: str = os.getenv("LOG_FILE", "glasner_lab.log")
    OUTPUT_DIR: str = os.getenv("OUTPUT_DIR", "./data/reports")

    # Paralelismo: el resultado nunca depende de este valor
    GLASNER_LAB_THREADS: int = _threads_default()

    # Reproducibilidad
    DEFAULT_SEED: int = int(os.getenv("DEFAULT_SEED", 20240601))

    # API
    API_HOST: str = os.getenv("API_HOST", "0.0.0.0")
    API_PORT: int = int(os.getenv("API_PORT", 8000))

    model_config = {
        "env_file": ".env",
        "extra": "ignore"  # Ignorar campos adicionales en lugar de lanzar un error
    }


settings = Settings()
