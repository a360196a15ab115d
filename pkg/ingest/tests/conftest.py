"""Synthetic fixture builders (reportlab PDFs, HTML pages)."""

import io

import pytest
from PIL import Image
from reportlab.lib.pagesizes import letter
from reportlab.lib.utils import ImageReader
from reportlab.pdfgen import canvas


def jpeg_reader(color: str, size=(60, 40)) -> ImageReader:
    img = Image.new("RGB", size, color)
    buf = io.BytesIO()
    img.save(buf, "JPEG")
    buf.seek(0)
    return ImageReader(buf)


def build_pdf(pages) -> bytes:
    """pages: list of draw commands, each ('image', color, x, y, w, h) or
    ('text', x, y, string)."""
    buf = io.BytesIO()
    c = canvas.Canvas(buf, pagesize=letter)
    for page in pages:
        for command in page:
            if command[0] == "image":
                _, color, x, y, w, h = command
                c.drawImage(jpeg_reader(color), x, y, width=w, height=h)
            else:
                _, x, y, text = command
                c.drawString(x, y, text)
        c.showPage()
    c.save()
    return buf.getvalue()


@pytest.fixture
def textbook_pdf(tmp_path):
    """2 pages, 3 figures: two on page 1, one on page 2 (plus body text)."""
    raw = build_pdf(
        [
            [
                ("image", "red", 72, 600, 144, 96),
                ("text", 72, 584, "Figure 1 Lung tissue with acute inflammation."),
                ("text", 72, 570, "The alveoli are filled with exudate."),
                ("image", "green", 72, 400, 144, 96),
                ("text", 72, 384, "Figure 2 Kidney cortex with two small cysts."),
            ],
            [
                ("text", 72, 720, "Body text that is not a caption."),
                ("image", "blue", 200, 500, 120, 90),
                ("text", 200, 484, "Fig. 3.1 Liver section."),
            ],
        ]
    )
    path = tmp_path / "textbook.pdf"
    path.write_bytes(raw)
    return path


@pytest.fixture
def mismatch_pdf(tmp_path):
    """One page holding 2 images but a single caption."""
    raw = build_pdf(
        [
            [
                ("image", "red", 72, 600, 100, 80),
                ("image", "blue", 300, 600, 100, 80),
                ("text", 72, 560, "Figure 7 A single caption for this page."),
            ]
        ]
    )
    path = tmp_path / "mismatch.pdf"
    path.write_bytes(raw)
    return path


FIXTURE_HTML = """<html><body>
<div class="entry">
  <div class="figure">
    <img src="images/spleen.jpg">
    <p>Spleen with capsule thickening.</p>
  </div>
  <ul>
    <li><img src="images/node.jpg"> Lymph node showing follicles.</li>
    <li><img src="images/liver.jpg"> Liver with fatty change.</li>
  </ul>
</div>
<div class="footer">No figures here.</div>
</body></html>"""
