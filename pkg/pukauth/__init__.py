"""PUK Auth Security - анализ стойкости аутентификации физическими неклонируемыми ключами."""

__version__ = "1.0.0"
