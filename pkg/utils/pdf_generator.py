"""
PDF Generation Utility for sweep reports
Ranked trade-off tables per scenario with goals, seeds and failures
"""

import io
from typing import Dict, List

from reportlab.lib import colors
from reportlab.lib.enums import TA_CENTER, TA_JUSTIFY
from reportlab.lib.pagesizes import A4
from reportlab.lib.styles import getSampleStyleSheet, ParagraphStyle
from reportlab.lib.units import inch
from reportlab.platypus import SimpleDocTemplate, Paragraph, Spacer, Table, TableStyle, PageBreak

from config import Config


class PDFGenerator:
    """Generate PDF reports from sweep results"""

    def __init__(self):
        self.styles = getSampleStyleSheet()
        self._setup_custom_styles()

    def _setup_custom_styles(self):
        self.styles.add(ParagraphStyle(
            name='CustomTitle',
            parent=self.styles['Title'],
            fontSize=22,
            spaceAfter=24,
            alignment=TA_CENTER,
            textColor=colors.HexColor('#1f77b4')
        ))

        self.styles.add(ParagraphStyle(
            name='CustomHeading1',
            parent=self.styles['Heading1'],
            fontSize=16,
            spaceAfter=10,
            spaceBefore=16,
            textColor=colors.HexColor('#2c3e50')
        ))

        self.styles.add(ParagraphStyle(
            name='CustomBody',
            parent=self.styles['Normal'],
            fontSize=10,
            spaceAfter=6,
            alignment=TA_JUSTIFY,
        ))

    def generate_pdf(self, results: Dict) -> bytes:
        """
        Build the sweep report in memory

        Args:
            results: {'rows': [row dicts], 'metadata': {...}, 'optimal': [lines]}

        Returns:
            PDF file content as bytes
        """
        buffer = io.BytesIO()
        try:
            # invariant=1: no creation date in the output
            doc = SimpleDocTemplate(
                buffer,
                pagesize=A4,
                rightMargin=54,
                leftMargin=54,
                topMargin=54,
                bottomMargin=36,
                title=Config.PDF_TITLE,
                invariant=1,
            )
            story = []
            story.extend(self._create_title_page(results))
            for scenario in sorted({r['scenario'] for r in results.get('rows', [])}):
                story.append(PageBreak())
                story.extend(self._create_scenario_section(results, scenario))
            if results.get('metadata', {}).get('failures'):
                story.append(PageBreak())
                story.extend(self._create_failures(results))
            doc.build(story)
            return buffer.getvalue()
        except Exception as e:
            raise Exception(f"PDF generation failed: {str(e)}")

    def _create_title_page(self, results: Dict) -> List:
        story = [Paragraph(Config.PDF_TITLE, self.styles['CustomTitle']), Spacer(1, 0.3 * inch)]
        metadata = results.get('metadata', {})
        rows = results.get('rows', [])

        metrics_data = [
            ['Setting', 'Value'],
            ['Root seed', str(metadata.get('root_seed', ''))],
            ['Step (s)', str(metadata.get('dt', ''))],
            ['Horizon (s)', str(metadata.get('horizon') or 'per scenario')],
            ['Common random numbers', 'yes' if metadata.get('common_random_numbers') else 'no'],
            ['Rows', str(len(rows))],
            ['Failed points', str(len(metadata.get('failures', [])))],
        ]
        story.append(self._table(metrics_data, [2.5 * inch, 3 * inch]))
        story.append(Spacer(1, 0.3 * inch))

        for line in results.get('optimal', []):
            story.append(Paragraph(line, self.styles['CustomBody']))
        return story

    def _create_scenario_section(self, results: Dict, scenario: str) -> List:
        story = [Paragraph(scenario, self.styles['CustomHeading1'])]
        goals = results.get('metadata', {}).get('goals', {}).get(scenario)
        if goals:
            story.append(Paragraph(
                f"Goals: at most {goals['energy_budget']} J, at least {goals['capture_goal']} movements "
                f"per {goals['window']:.0f} s; w_s={goals['w_s']}, w_e={goals['w_e']} "
                f"({goals['weights_source']} weights)",
                self.styles['CustomBody']))
            story.append(Spacer(1, 0.1 * inch))

        rows = [r for r in results.get('rows', []) if r['scenario'] == scenario]
        rows.sort(key=lambda r: (-r['t_s'], r['total_energy'], r['model'], r['configuration']))
        data = [['#', 'Model', 'Configuration', 't_s', 'Q_s', 'Q_e', 'Energy (J)']]
        for rank, r in enumerate(rows, start=1):
            data.append([str(rank), r['model'], r['configuration'], f"{r['t_s']:.4f}",
                         f"{r['q_s']:.3f}", f"{r['q_e']:.3f}", f"{r['total_energy']:.1f}"])
        story.append(self._table(data, [0.3 * inch, 2.2 * inch, 1.5 * inch, 0.6 * inch,
                                        0.55 * inch, 0.55 * inch, 0.8 * inch], font_size=8))
        return story

    def _create_failures(self, results: Dict) -> List:
        story = [Paragraph("Failed sweep points", self.styles['CustomHeading1'])]
        for failure in results['metadata']['failures']:
            story.append(Paragraph(failure.get('message', ''), self.styles['CustomBody']))
        return story

    def _table(self, data: List[List[str]], widths: List[float], font_size: int = 10) -> Table:
        table = Table(data, colWidths=widths)
        table.setStyle(TableStyle([
            ('BACKGROUND', (0, 0), (-1, 0), colors.HexColor('#1f77b4')),
            ('TEXTCOLOR', (0, 0), (-1, 0), colors.whitesmoke),
            ('ALIGN', (0, 0), (-1, -1), 'LEFT'),
            ('FONTNAME', (0, 0), (-1, 0), 'Helvetica-Bold'),
            ('FONTSIZE', (0, 0), (-1, -1), font_size),
            ('BOTTOMPADDING', (0, 0), (-1, 0), 8),
            ('BACKGROUND', (0, 1), (-1, -1), colors.beige),
            ('GRID', (0, 0), (-1, -1), 0.5, colors.black)
        ]))
        return table
