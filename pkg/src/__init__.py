"""
atnforge: MNIST 분류기를 대상으로 하는 Adversarial Transformation Network
src/__init__.py
"""
