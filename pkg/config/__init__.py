"""
기본 설정 (경로, 하이퍼파라미터, 종료 코드)
config/__init__.py
"""
