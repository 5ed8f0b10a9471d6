"""Builds tests/data/fixture.pptx, a small deck written by python-pptx.

The ingest tests pin the geometry below, so keep the two in sync.
"""
import struct
import sys
import zlib
from pathlib import Path

from pptx import Presentation
from pptx.dml.color import RGBColor
from pptx.enum.shapes import MSO_CONNECTOR, MSO_SHAPE
from pptx.util import Emu, Pt

W, H = 12192000, 6858000


def tiny_png() -> bytes:
    def chunk(tag, body):
        return struct.pack(">I", len(body)) + tag + body + struct.pack(">I", zlib.crc32(tag + body))

    raw = b"".join(b"\x00" + b"\xff\x00\x00" * 2 for _ in range(2))
    return (b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", struct.pack(">IIBBBBB", 2, 2, 8, 2, 0, 0, 0))
            + chunk(b"IDAT", zlib.compress(raw)) + chunk(b"IEND", b""))


def main(out: Path) -> None:
    prs = Presentation()
    prs.slide_width, prs.slide_height = Emu(W), Emu(H)

    s1 = prs.slides.add_slide(prs.slide_layouts[0])
    s1.shapes.title.text = "Quarterly Review"
    s1.placeholders[1].text = "Q3 revenue 42.5"

    s2 = prs.slides.add_slide(prs.slide_layouts[6])
    box = s2.shapes.add_textbox(Emu(W // 2), Emu(0), Emu(W // 4), Emu(H // 4))
    box.text_frame.text = "Plain textbox"
    run_box = s2.shapes.add_textbox(Emu(0), Emu(H // 2), Emu(W // 4), Emu(H // 8))
    run = run_box.text_frame.paragraphs[0].add_run()
    run.text = "Bold red"
    run.font.size, run.font.bold, run.font.name = Pt(24), True, "Georgia"
    run.font.color.rgb = RGBColor(0xC0, 0x10, 0x20)
    rect = s2.shapes.add_shape(MSO_SHAPE.RECTANGLE, Emu(0), Emu(0), Emu(W // 8), Emu(H // 8))
    rect.fill.solid()
    rect.fill.fore_color.rgb = RGBColor(0x12, 0x34, 0x56)
    rect.line.fill.background()
    line = s2.shapes.add_connector(MSO_CONNECTOR.STRAIGHT, Emu(0), Emu(H), Emu(W), Emu(0))
    line.line.color.rgb = RGBColor(0, 0, 0)
    line.line.width = Pt(2)

    s3 = prs.slides.add_slide(prs.slide_layouts[6])
    table = s3.shapes.add_table(2, 3, Emu(W // 10), Emu(H // 10), Emu(W // 2), Emu(H // 4)).table
    for r in range(2):
        for c in range(3):
            table.cell(r, c).text = f"r{r}c{c}"
    png = out.parent / "_tiny.png"
    png.write_bytes(tiny_png())
    s3.shapes.add_picture(str(png), Emu(W // 2), Emu(H // 2), Emu(W // 4), Emu(H // 4))
    png.unlink()

    prs.save(out)


if __name__ == "__main__":
    main(Path(sys.argv[1] if len(sys.argv) > 1 else "tests/data/fixture.pptx"))
