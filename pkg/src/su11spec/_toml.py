try:
    import tomllib as _reader
except ModuleNotFoundError:  # Python < 3.11
    import tomli as _reader

import tomli_w


def load_toml(text: str) -> dict:
    return _reader.loads(text)


def dump_toml(data: dict) -> str:
    return tomli_w.dumps(data)
