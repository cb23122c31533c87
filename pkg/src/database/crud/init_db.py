from src.database.database import Base, engine
from src.database.models import RunsOrm  # noqa: F401  регистрирует таблицу в metadata
from src.logs import getLogger

logger = getLogger(__name__)


def init_database():
    """Создание таблиц реестра прогонов"""
    Base.metadata.create_all(engine)
    logger.debug("Run registry tables are ready")
