import sys

from loguru import logger

_FORMAT = (
    "<green>{time:HH:mm:ss}</green> | <level>{level: <7}</level> | "
    "<cyan>{name}</cyan> | trial={extra[trial]} | {message}"
)


def configure_logging(level: str = "INFO", json: bool = False) -> None:
    logger.remove()
    logger.configure(extra={"trial": "-"})
    if json:
        logger.add(sys.stderr, level=level.upper(), serialize=True)
    else:
        logger.add(sys.stderr, level=level.upper(), format=_FORMAT)
