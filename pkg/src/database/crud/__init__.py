from src.database.crud.init_db import *
from src.database.crud.runs import *
