from app.utils.validators import validate_bench_dir, validate_box, validate_input_file


def test_input_file(tmp_path):
    path = tmp_path / 'a.smt2'
    path.write_text('(check-sat)')
    assert validate_input_file(str(path)) == (True, "Input file is valid")
    assert not validate_input_file(None)[0]
    assert not validate_input_file(str(tmp_path / 'missing.smt2'))[0]
    ok, message = validate_input_file(str(tmp_path))
    assert not ok and 'not a file' in message


def test_bench_dir(tmp_path):
    assert validate_bench_dir(str(tmp_path))[0]
    assert not validate_bench_dir('')[0]
    assert not validate_bench_dir(str(tmp_path / 'missing'))[0]


def test_box():
    assert validate_box(-6, 6)[0]
    assert validate_box(0, 0)[0]
    assert not validate_box(2, 1)[0]
    ok, message = validate_box(0, 100, max_width=50)
    assert not ok and 'too wide' in message
