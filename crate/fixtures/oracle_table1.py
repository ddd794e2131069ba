"""Independent reference for the fixture IM/EM table.

Uses only the Python standard library. Writes the expected TSV that the
acceptance suite compares `livemark report` against. Every fixture page is
treated as visited by every user, so stored marks count on all of them.
"""

import json
import re
import sys
from html.parser import HTMLParser
from pathlib import Path

HIDDEN = {"script", "style", "noscript", "template", "title", "textarea",
          "xmp", "iframe", "noembed", "noframes", "plaintext"}
TOKEN = re.compile(r"[^\W_]+")


class Visible(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.stack = []
        self.runs = []

    def handle_starttag(self, tag, attrs):
        if tag not in {"meta", "img", "br", "hr", "input", "link", "wbr", "area",
                       "base", "col", "embed", "source", "track"}:
            self.stack.append(tag)

    def handle_endtag(self, tag):
        if tag in self.stack:
            while self.stack.pop() != tag:
                pass

    def handle_data(self, data):
        if not any(t in HIDDEN for t in self.stack):
            self.runs.append(data)


def main():
    root = Path(__file__).parent
    profiles = json.loads((root / "profiles.json").read_text())
    marks = json.loads((root / "marks.json").read_text())
    users = sorted(profiles)
    out = ["page\t" + "\t".join(f"{u}:IM\t{u}:EM" for u in users)]
    for page in range(1, 11):
        parser = Visible()
        parser.feed((root / "pages" / f"p{page}.html").read_text(encoding="utf-8"))
        text = "".join(parser.runs)
        terms = [t.casefold() for run in parser.runs for t in TOKEN.findall(run)]
        cells = []
        for user in users:
            im = 0
            for keyword in profiles[user]:
                kw = [t.casefold() for t in TOKEN.findall(keyword)]
                if any(terms[i:i + len(kw)] == kw for i in range(len(terms))):
                    im += 1
            em = sum(1 for m in marks
                     if m["user"] == user and m["page"] == page and m["quote"] in text)
            cells += [str(im), str(em)]
        out.append(f"{page}\t" + "\t".join(cells))
    sys.stdout.write("\n".join(out) + "\n")


if __name__ == "__main__":
    main()
