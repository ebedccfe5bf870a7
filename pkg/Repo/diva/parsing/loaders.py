import yaml


def scalar_to_value(scalar):
    """
    Converts a YAML ScalarNode to its underlying Python value
    """
    value = yaml.safe_load(scalar.value) if scalar.value else None
    return value if scalar.style is None else scalar.value


def node_converter(x):
    """
    Converts YAML nodes of varying types into Python values,
    lists, and dictionaries
    """
    if isinstance(x, yaml.ScalarNode):
        return scalar_to_value(x)
    if isinstance(x, yaml.SequenceNode):
        return [node_converter(v) for v in x.value]
    if isinstance(x, yaml.MappingNode):
        return {node_converter(k): node_converter(v) for k, v in x.value}
    return x


def wrap_yaml(func):
    """Turn a function into one that can be run on a YAML input"""

    def ret(loader, x):
        value = node_converter(x)
        if isinstance(x, yaml.ScalarNode):
            return func() if value is None else func(value)
        if isinstance(x, yaml.SequenceNode):
            return func(*value)
        return func(**value)

    return ret


def unbounded(*args):
    """`hi: !unbounded` leaves a frequency range open above."""
    return None


def generate_loader(custom_constructors={}):
    """Generates a SafeLoader with the diva tags and any custom constructors"""

    class DivaLoader(yaml.SafeLoader):
        pass

    yaml_tags = {"!unbounded": unbounded}

    if isinstance(custom_constructors, list) and len(custom_constructors) > 0:
        custom_constructors = {("!" + func.__name__): func for func in custom_constructors}

    if len(custom_constructors) > 0:
        yaml_tags.update(custom_constructors)

    for tag, func in yaml_tags.items():
        DivaLoader.add_constructor(tag, wrap_yaml(func))

    return DivaLoader
