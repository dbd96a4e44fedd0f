"""
Interactive charts for runs and sweeps
Plotly HTML for zone occupancy, per-window captures and the trade-off ranking
"""

import logging
from typing import Optional, Sequence

import pandas as pd
import plotly.graph_objects as go
from plotly.subplots import make_subplots

logger = logging.getLogger(__name__)


def occupancy_chart(occupancy: pd.DataFrame, captures_per_window: Optional[Sequence[int]] = None,
                    window: float = 900.0, title: str = 'Crowd run') -> str:
    """Zone headcounts over time, with captured movements per window underneath"""
    try:
        rows = 2 if captures_per_window is not None else 1
        fig = make_subplots(
            rows=rows, cols=1,
            shared_xaxes=True,
            vertical_spacing=0.1,
            subplot_titles=('Zone occupancy', 'Captured movements per window')[:rows],
        )
        for zone in occupancy.columns:
            if zone == 'time':
                continue
            fig.add_trace(
                go.Scatter(x=occupancy['time'], y=occupancy[zone], name=zone, line=dict(width=1)),
                row=1, col=1
            )
        if captures_per_window is not None:
            fig.add_trace(
                go.Bar(
                    x=[(i + 0.5) * window for i in range(len(captures_per_window))],
                    y=list(captures_per_window),
                    name='captures',
                    marker_color='lightblue'
                ),
                row=2, col=1
            )
        fig.update_layout(
            title=title,
            xaxis_title='Time (s)',
            height=600 if rows == 2 else 400,
            showlegend=True,
            template='plotly_white'
        )
        return fig.to_html(include_plotlyjs='cdn', div_id='occupancy')

    except Exception as e:
        logger.error(f"Error creating occupancy chart: {str(e)}")
        return f"<p>Chart generation failed: {str(e)}</p>"


def tradeoff_chart(rows: pd.DataFrame, scenario: str) -> str:
    """Grouped bars of t_s per model, one bar per configuration"""
    try:
        data = rows[rows['scenario'] == scenario]
        fig = go.Figure()
        for configuration in sorted(data['configuration'].unique()):
            subset = data[data['configuration'] == configuration].sort_values('model')
            fig.add_trace(go.Bar(
                x=subset['model'],
                y=subset['t_s'],
                name=configuration,
                customdata=subset[['q_s', 'q_e', 'total_energy']].values,
                hovertemplate='t_s=%{y:.4f}<br>Q_s=%{customdata[0]:.3f}<br>'
                              'Q_e=%{customdata[1]:.3f}<br>E=%{customdata[2]:.1f} J',
            ))
        fig.update_layout(
            title=f'Trade-off score - {scenario}',
            barmode='group',
            yaxis=dict(range=[0, 1], title='t_s'),
            template='plotly_white',
            height=450,
        )
        return fig.to_html(include_plotlyjs='cdn', div_id=f'tradeoff-{scenario}')

    except Exception as e:
        logger.error(f"Error creating trade-off chart: {str(e)}")
        return f"<p>Chart generation failed: {str(e)}</p>"
