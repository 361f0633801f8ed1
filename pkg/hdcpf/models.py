# -*- coding: utf-8 -*-
import logging

from .exceptions import ValidationError
from .exceptions import FieldException

log = logging.getLogger('hdcpf')


class Field(object):
    """
    A declared parameter of a model. The field only knows its default and
    its validators, conversion from text is done by the netlist parser.
    """

    def __init__(self, name=None, validators=None, default=None, cast=None,
                 help_text=''):
        self.name = name
        self._validators = validators if validators else []
        self.default_validators = []
        self.default = default
        self.cast = cast
        self.help_text = help_text

    def __repr__(self):
        path = '%s.%s' % (self.__class__.__module__, self.__class__.__name__)
        name = getattr(self, 'name', None)
        if name is not None:
            return '<%s: %s>' % (path, name)
        return '<%s>' % path

    @property
    def validators(self):
        return self.default_validators + self._validators

    def check(self, **kwargs):
        """
        Definition-time checks, a default must pass its own validators
        """
        errors = []
        if self.default is not None:
            try:
                self.run_validators(self.default)
            except ValidationError as e:
                errors.append((self.name, 'invalid default %r: %s'
                               % (self.default, e)))
        return errors

    def contribute_to_class(self, model, name):
        if not self.name:
            self.name = name
        self.model = model

    def run_validators(self, value):
        errors = []
        for v in self.validators:
            try:
                v(value)
            except ValidationError as e:
                errors.extend(e.args[0] if e.args and
                              isinstance(e.args[0], list) else [str(e)])

        if errors:
            raise ValidationError(errors)

    def to_python(self, value):
        if value is None or self.cast is None:
            return value
        return self.cast(value)

    def clean(self, value):
        value = self.to_python(value)
        self.run_validators(value)
        return value


class Options(object):
    def __init__(self, meta=None):
        self.meta = meta
        self.model = None
        self.declared_fields = []
        self.exclude_fields = []
        self.label = None

    def get_declared_field_names(self):
        """
        Return a list of names of the declared fields
        """
        return [f.name for f in self.declared_fields]

    def get_field(self, name):
        for f in self.declared_fields:
            if f.name == name:
                return f
        raise KeyError(name)


class BaseModel(type):
    def __new__(cls, name, bases, nmspc):
        super_new = super(BaseModel, cls).__new__

        parents = [b for b in bases if isinstance(b, BaseModel)]

        module = nmspc.pop('__module__')
        new_attrs = {'__module__': module}
        if '__qualname__' in nmspc:
            new_attrs['__qualname__'] = nmspc.pop('__qualname__')
        new_cls = super_new(cls, name, bases, new_attrs)

        # Get class Meta options
        meta = nmspc.pop('Meta', None)
        new_cls._meta = Options(meta)

        for opt in dir(meta):
            if opt.find('__') == -1:
                setattr(new_cls._meta, opt, getattr(meta, opt))

        # Inherit the parent fields
        for base in parents:
            if not hasattr(base, '_meta'):
                continue

            for field in base._meta.declared_fields:
                if field.name in new_cls._meta.get_declared_field_names():
                    raise FieldException('The field %s already exists in '
                                         'another parent.' % field.name)
                new_cls._meta.declared_fields.append(field)

        fields_errors = []
        for obj_name, obj in nmspc.items():
            if not isinstance(obj, Field):
                setattr(new_cls, obj_name, obj)
            else:
                if obj_name in new_cls._meta.get_declared_field_names():
                    raise FieldException('The field %s already exists in a '
                                         'parent.' % obj_name)
                # Contribute to fields the model class and the name of the
                # variable (name of the field)
                obj.contribute_to_class(new_cls, obj_name)
                fields_errors.extend(obj.check())
                new_cls._meta.declared_fields.append(obj)

        if fields_errors:
            from termcolor import colored
            for field_error in fields_errors:
                print('%s: %s' % (colored(field_error[0], 'red'),
                                  field_error[1]))
            raise FieldException('Field errors.')

        new_cls._meta.model = new_cls
        if not new_cls._meta.label:
            new_cls._meta.label = name.lower()

        return new_cls


class Model(metaclass=BaseModel):

    def __init__(self, *args, **kwargs):
        # Initialize attributes to the field default value
        for field in self._meta.declared_fields:
            setattr(self, field.name, field.default)

        if args:
            if len(args) > len(self._meta.declared_fields):
                raise TypeError('Too many arguments. You can set only %s'
                                % len(self._meta.declared_fields))
            for count, arg in enumerate(args):
                setattr(self, self._meta.declared_fields[count].name, arg)

        for k in kwargs:
            if k not in self._meta.get_declared_field_names():
                raise TypeError("'%s' is an invalid keyword argument" % k)
            setattr(self, k, kwargs.get(k))

    def __repr__(self):
        values = ', '.join('%s=%r' % (f, getattr(self, f)) for f in
                           self._meta.get_declared_field_names())
        return '<%s: %s>' % (self.__class__.__name__, values)

    def __eq__(self, other):
        """
        Exam if two objects are equal
        """
        if not isinstance(other, self.__class__):
            return False
        for field in self._meta.get_declared_field_names():
            if field in self._meta.exclude_fields:
                continue
            if getattr(self, field) != getattr(other, field):
                return False

        return True

    def __hash__(self):
        return hash(tuple(self.as_dict().items()))

    def as_dict(self):
        return dict((f, getattr(self, f)) for f in
                    self._meta.get_declared_field_names())

    def replace(self, **kwargs):
        values = self.as_dict()
        values.update(kwargs)
        return self.__class__(**values).clean()

    def invariants(self):
        """
        Cross-field checks, returns a list of (field, message)
        """
        return []

    def clean(self, exclude=None):
        """
        Cleans all fields and raises a ValidationError containing a dict
        of all validation errors if any occur. Returns self so that
        constructors can be chained.
        """
        if exclude is None:
            exclude = []

        errors = {}
        for f in self._meta.declared_fields:
            if f.name in exclude:
                continue

            raw_value = getattr(self, f.name)
            try:
                setattr(self, f.name, f.clean(raw_value))
            except (ValidationError, TypeError, ValueError) as e:
                errors[f.name] = e

        if not errors:
            for name, message in self.invariants():
                errors.setdefault(name, ValidationError([message]))

        if errors:
            log.debug('[%s] %s failed validation: %r'
                      % (log.name.upper(), self.__class__.__name__, errors))
            raise ValidationError(errors)

        return self
