"""Подкоманды командной строки."""
