from typing import Final

LOCK_FILE_NAME: Final = ".spoison.lock"
