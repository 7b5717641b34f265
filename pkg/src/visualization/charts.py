"""
src/visualization/charts.py

학습 로그와 평가 결과를 plotly 차트(HTML)로 저장

🎯 핵심 목표:
- ATN 학습 곡선 (total / L_X / L_Y)
- 전이 행렬 히트맵 (ATN × 분류기)
- 병렬 / 직렬 chain 성공 개수 히스토그램
"""

import logging
from pathlib import Path
from typing import Union

import pandas as pd
import plotly.graph_objects as go
from plotly.subplots import make_subplots

logger = logging.getLogger(__name__)


def loss_curve_figure(log: pd.DataFrame, title: str = 'ATN 학습 곡선') -> go.Figure:
    """train_atn 로그 -> total 과 두 손실 항의 2단 차트"""
    fig = make_subplots(
        rows=2, cols=1,
        row_heights=[0.5, 0.5],
        subplot_titles=('전체 손실', '입력 손실 L_X & 출력 손실 L_Y'),
        vertical_spacing=0.1,
        shared_xaxes=True,
    )
    fig.add_trace(go.Scatter(
        x=log['step'], y=log['total'],
        line=dict(color='black', width=1),
        name='total',
    ), row=1, col=1)
    fig.add_trace(go.Scatter(
        x=log['step'], y=log['input_loss'],
        line=dict(color='blue', width=1),
        name='L_X',
    ), row=2, col=1)
    fig.add_trace(go.Scatter(
        x=log['step'], y=log['output_loss'],
        line=dict(color='red', width=1),
        name='L_Y',
    ), row=2, col=1)

    fig.update_layout(title=f'📉 {title}', height=700, showlegend=True, template='plotly_white')
    fig.update_xaxes(title_text='step', row=2, col=1)
    return fig


def transfer_heatmap(matrix: pd.DataFrame, title: str = 'ATN 전이 성공률') -> go.Figure:
    """TransferMatrix.to_frame() 결과 (값은 0~1 비율)"""
    fig = go.Figure(go.Heatmap(
        z=(matrix.values * 100).round(1),
        x=list(matrix.columns),
        y=list(matrix.index),
        colorscale='Reds',
        zmin=0, zmax=100,
        text=(matrix.values * 100).round(1),
        texttemplate='%{text}%',
        colorbar=dict(title='top-1 %'),
    ))
    fig.update_layout(title=f'🔁 {title}', template='plotly_white',
                      xaxis_title='평가 분류기', yaxis_title='ATN')
    fig.update_yaxes(autorange='reversed')
    return fig


def chain_histogram_figure(histograms: pd.DataFrame, title: str = '10개 ATN 적용 결과') -> go.Figure:
    """chain_frame() 결과: 모드별로 정확히 k 개 ATN 이 성공한 이미지 수"""
    colors = {'parallel': 'orange', 'serial': 'purple'}
    fig = go.Figure()
    for mode in histograms.columns:
        fig.add_trace(go.Bar(
            x=list(histograms.index), y=histograms[mode],
            marker_color=colors.get(mode, 'gray'),
            name=mode, opacity=0.8,
        ))
    fig.update_layout(title=f'⛓️ {title}', barmode='group', template='plotly_white',
                      xaxis_title='성공한 ATN 수', yaxis_title='이미지 수')
    return fig


def save_figure(fig: go.Figure, path: Union[str, Path]) -> Path:
    """HTML 저장 (plotly.js 는 CDN 참조)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.write_html(str(path), include_plotlyjs='cdn')
    logger.info(f"📊 차트 저장: {path}")
    return path
