import json

from rest_framework import serializers

from evaluation.exceptions import ParseError
from evaluation.ffield import FieldTower
from evaluation.mme import MmeInstance
from evaluation.poly import MultiPoly, UniPoly
from evaluation.rigidity import FieldMatrix


def flatten_errors(errors, prefix=""):
    """
    Turn nested serializer errors into ``path: message`` strings.

    Args:
        errors (dict or list): ``serializer.errors``.
        prefix (str): Dotted path of the enclosing record.

    Returns:
        list of str: One entry per leaf message, e.g. ``points.2: ...``.
    """
    found = []
    if isinstance(errors, dict):
        for key, value in errors.items():
            path = f"{prefix}.{key}" if prefix else str(key)
            found.extend(flatten_errors(value, path))
    elif isinstance(errors, list) and errors and not all(
        isinstance(e, str) for e in errors
    ):
        for i, value in enumerate(errors):
            if value:
                path = f"{prefix}.{i}" if prefix else str(i)
                found.extend(flatten_errors(value, path))
    else:
        messages = errors if isinstance(errors, list) else [errors]
        found.extend(f"{prefix or 'input'}: {message}" for message in messages)
    return found


def load_record(serializer_class, source, **kwargs):
    """
    Parse a JSON document and validate it with ``serializer_class``.

    Args:
        serializer_class: Serializer to validate with.
        source: Path, file object or already decoded data.

    Returns:
        The domain object returned by ``serializer.save()``.

    Raises:
        ParseError: On malformed JSON (with line and column) or on
            validation errors (with dotted field paths).
    """
    if isinstance(source, (dict, list)):
        data = source
    else:
        try:
            if hasattr(source, "read"):
                data = json.load(source)
            else:
                with open(source) as handle:
                    data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ParseError(
                f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
            ) from exc
        except OSError as exc:
            raise ParseError(f"cannot read {source}: {exc}") from exc
    serializer = serializer_class(data=data, **kwargs)
    if not serializer.is_valid():
        raise ParseError("; ".join(flatten_errors(serializer.errors)))
    return serializer.save()


def element_field(**kwargs):
    return serializers.ListField(
        child=serializers.IntegerField(min_value=0), allow_empty=False, **kwargs
    )


def check_element(value, p, a):
    if len(value) != a:
        raise serializers.ValidationError(
            f"expected {a} coordinates, got {len(value)}"
        )
    if any(c >= p for c in value):
        raise serializers.ValidationError(f"coordinates must be below p={p}")


def check_elements(name, values, p, a):
    errors = {}
    for i, value in enumerate(values):
        try:
            check_element(value, p, a)
        except serializers.ValidationError as exc:
            errors[i] = exc.detail
    if errors:
        raise serializers.ValidationError({name: errors})


class FieldSerializer(serializers.Serializer):
    """
    Field record ``{"p": 2, "a": 3, "modulus": [1, 1, 0, 1]}``.

    ``modulus`` lists the coefficients of v0 over F_p from the constant
    term up; it is optional.
    """

    p = serializers.IntegerField(min_value=2)
    a = serializers.IntegerField(min_value=1)
    modulus = serializers.ListField(
        child=serializers.IntegerField(min_value=0), required=False
    )

    def validate(self, attrs):
        modulus = attrs.get("modulus")
        if modulus is not None and len(modulus) != attrs["a"] + 1:
            raise serializers.ValidationError(
                {"modulus": f"expected {attrs['a'] + 1} coefficients"}
            )
        if modulus is not None and any(c >= attrs["p"] for c in modulus):
            raise serializers.ValidationError(
                {"modulus": f"coefficients must be smaller than p={attrs['p']}"}
            )
        return attrs

    def create(self, validated_data):
        return FieldTower(
            validated_data["p"], validated_data["a"], validated_data.get("modulus")
        )


class PolynomialSerializer(serializers.Serializer):
    """
    Multivariate polynomial record ``{"n": 2, "d": 3, "coeffs": [...]}``.

    ``coeffs`` holds ``d^n`` elements; position ``sum(e_j * d^j)`` is the
    coefficient of ``x^e``.
    """

    n = serializers.IntegerField(min_value=1)
    d = serializers.IntegerField(min_value=1)
    coeffs = serializers.ListField(child=element_field())

    def validate(self, attrs):
        expected = attrs["d"] ** attrs["n"]
        if len(attrs["coeffs"]) != expected:
            message = (
                f"expected d^n = {expected} coefficients, "
                f"got {len(attrs['coeffs'])}"
            )
            raise serializers.ValidationError({"coeffs": message})
        return attrs


class UniPolynomialSerializer(serializers.Serializer):
    """
    Univariate polynomial file ``{"field": {...}, "coeffs": [...], "n": 16}``.

    ``n`` is the degree bound handed to the data structure; it defaults to
    ``max(2, len(coeffs))``.
    """

    field = FieldSerializer()
    coeffs = serializers.ListField(child=element_field())
    n = serializers.IntegerField(min_value=2, required=False)

    def validate(self, attrs):
        field = attrs["field"]
        check_elements("coeffs", attrs["coeffs"], field["p"], field["a"])
        return attrs

    def create(self, validated_data):
        tower = self.fields["field"].create(validated_data["field"])
        f = UniPoly(tower.fq, [tower.fq.from_ints(c) for c in validated_data["coeffs"]])
        n = validated_data.get("n", max(2, len(validated_data["coeffs"])))
        return tower, f, n


class InstanceSerializer(serializers.Serializer):
    """
    Multipoint-evaluation instance file.

    Fields:
        - field: Field record.
        - polynomial: Polynomial record.
        - points: List of points, each a list of n elements.
    """

    field = FieldSerializer()
    polynomial = PolynomialSerializer()
    points = serializers.ListField(
        child=serializers.ListField(child=element_field()), allow_empty=True
    )

    def validate(self, attrs):
        p, a = attrs["field"]["p"], attrs["field"]["a"]
        n = attrs["polynomial"]["n"]
        errors = {}
        try:
            check_elements("coeffs", attrs["polynomial"]["coeffs"], p, a)
        except serializers.ValidationError as exc:
            errors["polynomial"] = exc.detail
        point_errors = {}
        for i, point in enumerate(attrs["points"]):
            if len(point) != n:
                point_errors[i] = [f"expected {n} coordinates, got {len(point)}"]
                continue
            try:
                check_elements(i, point, p, a)
            except serializers.ValidationError as exc:
                point_errors.update(exc.detail)
        if point_errors:
            errors["points"] = point_errors
        if errors:
            raise serializers.ValidationError(errors)
        return attrs

    def create(self, validated_data):
        tower = self.fields["field"].create(validated_data["field"])
        record = validated_data["polynomial"]
        fq = tower.fq
        f = MultiPoly(
            fq, record["n"], record["d"], [fq.from_ints(c) for c in record["coeffs"]]
        )
        points = [
            tuple(fq.from_ints(c) for c in point) for point in validated_data["points"]
        ]
        return MmeInstance(tower, f, points)


class GeneratorsSerializer(serializers.Serializer):
    """Vandermonde generators file ``{"field": {...}, "generators": [...]}``."""

    field = FieldSerializer()
    generators = serializers.ListField(child=element_field(), allow_empty=False)

    def validate(self, attrs):
        check_elements(
            "generators", attrs["generators"], attrs["field"]["p"], attrs["field"]["a"]
        )
        return attrs

    def create(self, validated_data):
        tower = self.fields["field"].create(validated_data["field"])
        return tower, [tower.fq.from_ints(c) for c in validated_data["generators"]]


class MatrixSerializer(serializers.Serializer):
    """
    Matrix record ``{"rows": r, "cols": c, "entries": [...]}`` with the
    ``r * c`` entries in row-major order.

    The field comes from the ``tower`` context entry.
    """

    rows = serializers.IntegerField(min_value=1)
    cols = serializers.IntegerField(min_value=1)
    entries = serializers.ListField(child=element_field())

    def validate(self, attrs):
        expected = attrs["rows"] * attrs["cols"]
        if len(attrs["entries"]) != expected:
            raise serializers.ValidationError(
                {"entries": f"expected {expected} entries, got {len(attrs['entries'])}"}
            )
        tower = self.context.get("tower")
        if tower is not None:
            check_elements("entries", attrs["entries"], tower.p, tower.a)
        return attrs

    def create(self, validated_data):
        fq = self.context["tower"].fq
        cols = validated_data["cols"]
        values = [fq.from_ints(c) for c in validated_data["entries"]]
        return FieldMatrix(
            fq, [values[i:i + cols] for i in range(0, len(values), cols)]
        )


class SplitFactorSerializer(serializers.Serializer):
    L = serializers.DictField()
    S = serializers.DictField()


class SplitFactorsSerializer(serializers.Serializer):
    """
    Kronecker split input with a field record, a threshold ``t`` and
    ``factors``, a list of ``{"L": matrix, "S": matrix}`` records.

    ``save()`` returns ``(tower, [(L, S), ...], t)``.
    """

    field = FieldSerializer()
    t = serializers.IntegerField(min_value=0)
    factors = serializers.ListField(child=SplitFactorSerializer(), allow_empty=False)

    def validate(self, attrs):
        tower = FieldSerializer().create(attrs["field"])
        errors = {}
        parsed = []
        for i, pair in enumerate(attrs["factors"]):
            matrices = []
            for key in ("L", "S"):
                serializer = MatrixSerializer(data=pair[key], context={"tower": tower})
                if serializer.is_valid():
                    matrices.append(serializer.save())
                else:
                    errors.setdefault(i, {})[key] = serializer.errors
            parsed.append(tuple(matrices))
        if errors:
            raise serializers.ValidationError({"factors": errors})
        attrs["tower"], attrs["pairs"] = tower, parsed
        return attrs

    def create(self, validated_data):
        return validated_data["tower"], validated_data["pairs"], validated_data["t"]
