"""
공용 유틸리티
src/utils/__init__.py
"""

from .logger import setup_logging

__all__ = ['setup_logging']
