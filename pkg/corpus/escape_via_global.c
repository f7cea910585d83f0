// expect: race
// A local of main is published through a global pointer.
int *shared;
void *worker(void *p) {
  *shared = 5;
  return NULL;
}
int main() {
  int local = 0;
  shared = &local;
  create(worker);
  local = 1;
  return 0;
}
