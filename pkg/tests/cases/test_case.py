import pytest

from frats.cases.case import Case


class TestErrorCase(Case):
    def __init__(self, name, meta):
        super().__init__(name, meta)


class TestCase(Case):
    def __init__(self, name, meta):
        super().__init__(name, meta)

    def get_config(self, *args, **kwargs):
        super().get_config()

    def check_data(self):
        super().check_data()


@pytest.fixture(scope="module")
def case():
    case_ = TestCase("test", {"a": 1, "b": 2})
    return case_


def test_repr(case):
    assert case.__repr__() == "Задача('test')"


def test_info(case):
    assert list(case.info.keys()) == ["Наименование", "a", "b"]


def test_type_error():
    with pytest.raises(TypeError):
        TestErrorCase("", {})


@pytest.mark.parametrize("name", ["get_config", "check_data"])
def test_methods(case, name):
    assert hasattr(case, name)
    with pytest.raises(NotImplementedError):
        getattr(case, name)()
