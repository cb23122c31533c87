from sqlalchemy import Integer, create_engine
from sqlalchemy.orm import DeclarativeBase, Mapped, mapped_column, sessionmaker
from sqlalchemy.pool import StaticPool

from src.config import settings
from src.logs import getLogger

getLogger("sqlalchemy.engine").propagate = False

getLogger(__name__).debug(f"Run registry target: {settings.storage.url}")

# sqlite в памяти: одно соединение на процесс, иначе каждая сессия видит пустую базу
_in_memory = settings.storage.url in ("sqlite://", "sqlite:///:memory:")

engine = create_engine(
    settings.storage.url,
    echo=False,
    **({"poolclass": StaticPool, "connect_args": {"check_same_thread": False}} if _in_memory else {}))

SessionLocal = sessionmaker(
    bind=engine,
    expire_on_commit=False)


class Base(DeclarativeBase):
    id: Mapped[int] = mapped_column(Integer, primary_key=True, autoincrement=True)

    def __repr__(self):
        cols = ", ".join(f"{c.name}={getattr(self, c.name)}" for c in self.__table__.columns)
        return f"<{self.__class__.__name__}({cols})>"
