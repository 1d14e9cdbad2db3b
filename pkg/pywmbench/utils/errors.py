class PywmbenchException(Exception):
    pass


class ConfigException(PywmbenchException):
    """
    Raised for malformed configuration. `path` names the offending field in schema notation,
    for example ``schemes[1].config.alpha``.
    """

    def __init__(self, message: str, path: str = ""):
        self.message = message
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)
