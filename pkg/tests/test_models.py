# -*- coding: utf-8 -*-
import math

import pytest

from hdcpf import models, exceptions, validators
from hdcpf.conventions import Conventions, load_conventions
from hdcpf.conventions import default_conventions
from hdcpf.lock import PidGains, LockParams
from hdcpf.noise import NoiseSpec

from tests import models as test_models


class TestBaseModel:

    @pytest.fixture(autouse=True)
    def nmspc(self):
        self.base_dict = dict(
            __module__='__main__'
        )

    def test_new(self):
        new_class = type('TestModel', (models.Model, ), self.base_dict)

        assert hasattr(new_class, '_meta')
        assert isinstance(new_class._meta, models.Options)
        assert new_class._meta.declared_fields == []
        assert new_class._meta.label == 'testmodel'
        assert new_class._meta.model is new_class

    def test_new_with_meta_class(self):
        assert test_models.TestModel2._meta.label == 'example'

    def test_new_with_fields(self):
        nmspc = self.base_dict
        nmspc.update(var1=models.Field(default=1.0))
        new_class = type('TestModel', (models.Model, ), nmspc)

        assert len(new_class._meta.declared_fields) == 1
        assert new_class._meta.get_declared_field_names() == ['var1']
        assert new_class._meta.get_field('var1').model is new_class

    def test_new_inheritance(self):
        names = test_models.TestModel3._meta.get_declared_field_names()
        assert names == ['var1', 'var2', 'var3']

    def test_new_raise_duplicate_parent_field(self):
        nmspc = self.base_dict
        nmspc.update(var1=models.Field())

        with pytest.raises(exceptions.FieldException):
            type('TestModel', (test_models.TestModel1, ), nmspc)

    def test_new_raise_invalid_default(self):
        nmspc = self.base_dict
        nmspc.update(var1=models.Field(
            validators=[validators.PositiveValidator()], default=-1))

        with pytest.raises(exceptions.FieldException):
            type('TestModel', (models.Model, ), nmspc)


class TestModel:

    def test_init_defaults(self):
        obj = test_models.TestModel1()
        assert obj.var1 == 0.0
        assert obj.var2 is None

    def test_init_args(self):
        obj = test_models.TestModel1(3.0, 'x')
        assert obj.var1 == 3.0
        assert obj.var2 == 'x'

    def test_init_too_many_args(self):
        with pytest.raises(TypeError):
            test_models.TestModel1(1, 2, 3)

    def test_init_unknown_kwarg(self):
        with pytest.raises(TypeError):
            test_models.TestModel1(var9=1)

    def test_clean_casts(self):
        obj = test_models.TestModel3(var1='2', var3='5').clean()
        assert obj.var1 == 2.0
        assert obj.var3 == 5

    def test_clean_collects_field_errors(self):
        with pytest.raises(exceptions.ValidationError) as excinfo:
            test_models.TestModel3(var1=-1.0, var3=0).clean()
        errors = excinfo.value.args[0]
        assert sorted(errors) == ['var1', 'var3']

    def test_clean_bad_cast(self):
        with pytest.raises(exceptions.ValidationError) as excinfo:
            test_models.TestModel1(var1='abc').clean()
        assert 'var1' in excinfo.value.args[0]

    def test_invariants_run_after_fields(self):
        with pytest.raises(exceptions.ValidationError) as excinfo:
            test_models.TestModel3(var1=4.0, var3=2).clean()
        assert list(excinfo.value.args[0]) == ['var3']

    def test_clean_exclude(self):
        obj = test_models.TestModel1(var1=-1.0)
        assert obj.clean(exclude=['var1']) is obj

    def test_replace(self):
        obj = test_models.TestModel3(var1=1.0, var3=2).clean()
        other = obj.replace(var3=7)
        assert other.var3 == 7
        assert obj.var3 == 2
        with pytest.raises(exceptions.ValidationError):
            obj.replace(var1=-5.0)

    def test_eq_and_hash(self):
        a = test_models.TestModel1(var1=1.0, var2='a')
        b = test_models.TestModel1(var1=1.0, var2='a')
        assert a == b
        assert hash(a) == hash(b)
        assert a != test_models.TestModel1(var1=2.0, var2='a')

    def test_as_dict(self):
        obj = test_models.TestModel1(var1=1.0, var2='a')
        assert obj.as_dict() == {'var1': 1.0, 'var2': 'a'}


class TestValidators:

    def test_range(self):
        v = validators.RangeValidator(0, 1)
        v(0.5)
        for value in (-0.1, 1.1, float('nan'), None):
            with pytest.raises(exceptions.ValidationError):
                v(value)

    def test_positive(self):
        validators.PositiveValidator()(1e-9)
        with pytest.raises(exceptions.ValidationError):
            validators.PositiveValidator()(0)

    def test_choice(self):
        v = validators.ChoiceValidator(('a', 'b'))
        v('a')
        with pytest.raises(exceptions.ValidationError):
            v('c')

    def test_finite(self):
        validators.FiniteValidator()(-3.0)
        with pytest.raises(exceptions.ValidationError):
            validators.FiniteValidator()(float('inf'))


class TestDomainModels:

    def test_pid_gains_limits(self):
        with pytest.raises(exceptions.ValidationError) as excinfo:
            PidGains(low=1.0, high=0.0).clean()
        assert 'high' in excinfo.value.args[0]

    def test_lock_params_sampling(self):
        with pytest.raises(exceptions.ValidationError) as excinfo:
            LockParams(dt=1e-5).clean()
        assert 'dt' in excinfo.value.args[0]

    def test_lock_params_defaults(self):
        p = LockParams().clean()
        assert p.frequency == pytest.approx(1e4)
        assert p.cutoff == pytest.approx(200.0)
        assert p.samples_per_period == 100

    def test_noise_spec_ranges(self):
        with pytest.raises(exceptions.ValidationError) as excinfo:
            NoiseSpec(loss=1.5, visibility=-0.1).clean()
        assert sorted(excinfo.value.args[0]) == ['loss', 'visibility']

    def test_noise_spec_coherent(self):
        assert NoiseSpec().clean().is_coherent()
        assert NoiseSpec(loss=0.2).clean().is_coherent()
        assert not NoiseSpec(jitter=0.1).clean().is_coherent()


class TestConventions:

    def test_default_fixture(self):
        c = default_conventions()
        assert isinstance(c, Conventions)
        assert c.pbs_reflection_phase == pytest.approx(math.pi / 2)
        assert c.interferometer_phase == pytest.approx(-math.pi / 2)
        assert c.pp_b == pytest.approx(math.pi)

    def test_override(self):
        c = load_conventions(mirror_phase=0.0)
        assert c.mirror_phase == 0.0
        assert c != default_conventions()

    def test_invalid_override(self):
        with pytest.raises(exceptions.ConventionError):
            load_conventions(mirror_phase=20.0)

    def test_unknown_field(self):
        with pytest.raises(exceptions.ConventionError):
            load_conventions(color='blue')

    def test_missing_file(self, tmp_path):
        with pytest.raises(exceptions.ConventionError):
            load_conventions(str(tmp_path / 'missing.json'))
