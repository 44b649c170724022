import logging

_LOGGER_CONFIGURED = False


def configure_logger(prefix: str = "", level: int = logging.INFO):
    global _LOGGER_CONFIGURED
    if _LOGGER_CONFIGURED:
        return

    _LOGGER_CONFIGURED = True

    logging.basicConfig(
        level=level,
        format=f"[%(asctime)s{prefix}] %(filename)s:%(lineno)d - %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
        force=True,
    )
    # cvxpy and its backends are chatty at INFO
    for name in ("cvxpy", "clarabel"):
        logging.getLogger(name).setLevel(max(level, logging.WARNING))
