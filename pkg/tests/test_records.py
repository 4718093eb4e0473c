"""Name parsing, variate derivation, and canonical record round trips."""

import pytest
from hypothesis import given, strategies as st

from namelink.records import (
    AuthorRef,
    BibRecord,
    RecordFormatError,
    atomic_name_variate,
    first_name_of,
    make_record,
    parse_author_name,
    read_records,
    record_from_json,
    record_to_json,
    variate_of_name,
    write_records,
)


class TestParseAuthorName:
    def test_plain_name(self):
        ref = parse_author_name("Lei Wang")
        assert ref.first == "Lei"
        assert ref.last == "Wang"
        assert ref.middle == ()
        assert ref.display_name == "Lei Wang"
        assert ref.author_key == "Lei Wang"

    def test_disambiguation_suffix(self):
        ref = parse_author_name("Bing Li 0001")
        assert ref.author_key == "Bing Li 0001"
        assert ref.display_name == "Bing Li"
        assert ref.first == "Bing"
        assert ref.last == "Li"

    def test_middle_names(self):
        ref = parse_author_name("Juan M. de la Cruz")
        assert ref.first == "Juan"
        assert ref.middle == ("M.", "de", "la")
        assert ref.last == "Cruz"

    def test_single_token(self):
        ref = parse_author_name("Madonna")
        assert ref.first == ""
        assert ref.last == "Madonna"
        assert ref.display_name == "Madonna"

    def test_suffix_alone_is_a_name(self):
        # a bare 4-digit token has nothing to attach to, so it is the name
        ref = parse_author_name("0001")
        assert ref.author_key == "0001"
        assert ref.last == "0001"

    def test_whitespace_normalized(self):
        ref = parse_author_name("  Wei   Chen ")
        assert ref.raw == "Wei Chen"
        assert ref.author_key == "Wei Chen"

    def test_empty_raises(self):
        with pytest.raises(ValueError):
            parse_author_name("   ")

    def test_five_digit_tail_is_not_a_suffix(self):
        ref = parse_author_name("Wei Chen 12345")
        assert ref.display_name == "Wei Chen 12345"
        assert ref.last == "12345"


class TestAtomicNameVariate:
    def test_basic(self):
        assert variate_of_name("Lei Wang") == "L Wang"

    def test_idempotent(self):
        assert variate_of_name("L Wang") == "L Wang"

    def test_initial_with_period(self):
        assert variate_of_name("J. M. Lee") == "J Lee"

    def test_lowercase_first_uppercased(self):
        assert variate_of_name("lei wang") == "L wang"

    def test_degenerate_single_token(self):
        assert variate_of_name("Madonna") == "Madonna"

    def test_suffix_ignored(self):
        assert variate_of_name("Bing Li 0001") == "B Li"

    @given(
        st.text(
            alphabet=st.characters(whitelist_categories=("Lu", "Ll")),
            min_size=1,
            max_size=8,
        ),
        st.text(
            alphabet=st.characters(whitelist_categories=("Lu", "Ll")),
            min_size=1,
            max_size=10,
        ),
    )
    def test_idempotence_property(self, first, last):
        variate = variate_of_name(f"{first} {last}")
        assert variate_of_name(variate) == variate

    def test_variate_count_matches_author_count(self, tiny_records):
        for record in tiny_records:
            variates = [atomic_name_variate(a) for a in record.authors]
            assert len(variates) == len(record.authors)
            assert all(v for v in variates)


class TestFirstNameOf:
    def test_full(self):
        assert first_name_of("Bing Li") == "Bing"

    def test_abbreviated(self):
        assert first_name_of("B Li") == "B"

    def test_single_token(self):
        assert first_name_of("Madonna") == ""

    def test_empty(self):
        assert first_name_of("   ") == ""


class TestBibRecord:
    def test_requires_authors(self):
        with pytest.raises(ValueError):
            BibRecord("x", "Title", "src", 2000, ())

    def test_requires_title(self):
        with pytest.raises(ValueError):
            make_record("x", "   ", ["A B"])

    def test_author_keys(self, tiny_records):
        assert tiny_records[0].author_keys() == (
            "Bing Li 0001",
            "Wei Chen",
            "Lei Wang",
        )


class TestCanonicalFormat:
    def test_round_trip_field_equal(self, tiny_records):
        for record in tiny_records:
            again = record_from_json(record_to_json(record))
            assert again == record

    def test_file_round_trip(self, tmp_path, tiny_records):
        path = tmp_path / "records.jsonl"
        count = write_records(path, tiny_records)
        assert count == len(tiny_records)
        assert list(read_records(path)) == tiny_records

    def test_year_null_round_trip(self):
        record = make_record("x", "T.", ["A B"], year=None)
        assert record_from_json(record_to_json(record)).year is None

    def test_unicode_preserved(self, tmp_path):
        record = make_record("x", "Über maps", ["José Álvarez 0002"], source="Größe")
        path = tmp_path / "r.jsonl"
        write_records(path, [record])
        (again,) = read_records(path)
        assert again == record
        assert again.authors[0].display_name == "José Álvarez"

    @pytest.mark.parametrize(
        "line",
        [
            "not json",
            "[1, 2]",
            '{"id": "x", "title": "T", "authors": []}',
            '{"id": "x", "title": "T", "authors": ["A B"], "year": "2001"}',
            '{"id": "x", "authors": ["A B"]}',
            '{"id": "x", "title": " ", "authors": ["A B"]}',
        ],
    )
    def test_malformed_lines_rejected(self, line):
        with pytest.raises(RecordFormatError):
            record_from_json(line)

    def test_read_reports_line_numbers(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"id":"a","title":"T","authors":["A B"]}\nnope\n')
        with pytest.raises(RecordFormatError, match="bad.jsonl:2"):
            list(read_records(path))
