"""
시각화 모듈
src/visualization/__init__.py
"""

from .charts import chain_histogram_figure, loss_curve_figure, save_figure, transfer_heatmap

__all__ = ['loss_curve_figure', 'transfer_heatmap', 'chain_histogram_figure', 'save_figure']
