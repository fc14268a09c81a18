import hypothesis
import pytest

from worldtag import settings
from worldtag.model import AnnotatedDocument, Span, TagKind

hypothesis.settings.register_profile("default", deadline=None)
hypothesis.settings.register_profile("fast", max_examples=20, deadline=None)
hypothesis.settings.load_profile("default")

# ten one-letter-pair words; token i is word i
WORDS_TEXT = " ".join(f"w{i}" for i in range(10))


def token_doc(annotator_id, spans, text=WORDS_TEXT):
    """Document over space-separated words; spans are (kind, first token, last token, id)."""
    words = []
    pos = 0
    for word in text.split(" "):
        words.append((pos, pos + len(word)))
        pos += len(word) + 1
    built = [Span(kind, words[first][0], words[last][1], element_id) for kind, first, last, element_id in spans]
    return AnnotatedDocument.create(annotator_id, text, built)


@pytest.fixture(autouse=True)
def pristine_settings(monkeypatch):
    """Tests may overlay settings; every test starts from the module defaults."""
    for key, (name, _) in settings.OVERLAY_KEYS.items():
        monkeypatch.setattr(settings, name, getattr(settings, name))
    yield
