// expect: race_free
atomic_int counter;
void *worker(void *p) {
  counter++;
  return NULL;
}
int main() {
  create(worker);
  create(worker);
  counter = 0;
  return 0;
}
