from glocal.config import settings
