// expect: race_free
// A reader under the read lock and a writer under the write lock.
#include <pthread.h>
pthread_rwlock_t rw;
int table;
int seen;
void *reader(void *p) {
  pthread_rwlock_rdlock(&rw);
  seen = table;
  pthread_rwlock_unlock(&rw);
  return NULL;
}
void *writer(void *p) {
  pthread_rwlock_wrlock(&rw);
  table = 2;
  pthread_rwlock_unlock(&rw);
  return NULL;
}
int main() {
  pthread_t a, b;
  pthread_create(&a, NULL, reader, NULL);
  pthread_create(&b, NULL, writer, NULL);
  return 0;
}
