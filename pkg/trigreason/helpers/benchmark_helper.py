import io
import json
import os

from trigreason.entities.benchmark_entities import AnswerKind, BenchmarkItem
from trigreason.exceptions import ConfigException, SchemaError


def load_benchmark(dataset_path):
    """
    Benchmark dataset, one {"id", "question", "answer", "kind"} object per line, ordered by id
    :type dataset_path: str
    :rtype: list[BenchmarkItem]
    """
    if not os.path.isfile(dataset_path):
        raise ConfigException('Benchmark', 'dataset: file {} does not exist'.format(dataset_path))
    items = {}
    with io.open(dataset_path, 'r', encoding='utf-8') as dataset_file:
        for line_number, line in enumerate(dataset_file, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except ValueError as e:
                raise SchemaError(line_number, 'invalid JSON: {}'.format(e))
            if not isinstance(record, dict):
                raise SchemaError(line_number, 'record is not an object')
            for name in ('id', 'question', 'answer'):
                if record.get(name) is None:
                    raise SchemaError(line_number, 'missing field "{}"'.format(name))
            try:
                kind = AnswerKind(record.get('kind', AnswerKind.INTEGER_BOXED.value))
            except ValueError:
                raise SchemaError(line_number, 'unknown answer kind {!r}'.format(record.get('kind')))
            item_id = str(record['id'])
            if item_id in items:
                raise SchemaError(line_number, 'duplicate id {}'.format(item_id))
            items[item_id] = BenchmarkItem(id=item_id, question=record['question'], answer=str(record['answer']),
                                           kind=kind)
    if not items:
        raise ConfigException('Benchmark', 'dataset: {} has no questions'.format(dataset_path))
    return [items[item_id] for item_id in sorted(items)]
