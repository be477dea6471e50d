from dotenv import load_dotenv
import logging
from .shared.config import Settings

load_dotenv("setting.env")
settings = Settings.from_env()

handlers: list[logging.Handler] = [logging.StreamHandler()]
if settings.LOG_FILE:
    handlers.append(logging.FileHandler(settings.LOG_FILE))

logging.basicConfig(
    level=settings.LOG_LEVEL,
    format="%(asctime)s - %(name)s - %(levelname)s :: %(message)s",
    handlers=handlers,
)

# Get logger for this module
logger = logging.getLogger(__name__)

__all__ = ["settings", "logger"]
